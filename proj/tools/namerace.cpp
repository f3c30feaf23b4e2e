#include "namerace/cli.hpp"

int main(int argc, char** argv) { return namerace::cli::run(argc, argv); }
