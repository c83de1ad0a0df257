#include "tsemap/cli.hpp"

int main(int argc, char** argv) { return tsemap::cli::run(argc, argv); }
