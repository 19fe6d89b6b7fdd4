#include <iostream>

int main() {
    std::cout << "clperf: not wired up yet\n";
    return 0;
}
