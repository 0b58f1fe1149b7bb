// Toy analyzer used to exercise the flag-check harness: reports every line
// containing the marker "TODOBUG" as "path:line: message".

#include <fstream>
#include <iostream>
#include <string>

int main(int argc, char** argv)
{
    if (argc < 2) {
        std::cerr << "usage: " << argv[0] << " <file>...\n";
        return 2;
    }
    int status = 0;
    for (int i = 1; i < argc; ++i) {
        std::ifstream in(argv[i], std::ios::binary);
        if (!in) {
            std::cerr << argv[i] << ": cannot open\n";
            status = 1;
            continue;
        }
        std::string line;
        for (int number = 1; std::getline(in, line); ++number) {
            if (line.find("TODOBUG") != std::string::npos)
                std::cout << argv[i] << ':' << number << ": TODOBUG marker\n";
        }
    }
    return status;
}
