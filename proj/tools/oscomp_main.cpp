#include "oscomp/cli.hpp"

int main(int argc, char** argv) {
    return oscomp::cli::run_cli(argc, argv);
}
