#include "fovlab/cli.hpp"

int main(int argc, char** argv) { return fovlab::cli::run(argc, argv); }
