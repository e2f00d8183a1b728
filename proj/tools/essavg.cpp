#include <essavg/cli.hpp>

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return essavg::cli::run(args, std::cout, std::cerr);
}
