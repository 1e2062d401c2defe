#include "mcfs/cli.hpp"

int main(int argc, char** argv) { return mcfs::cli::run(argc, argv); }
