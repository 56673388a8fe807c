#include "lvx/cli.hpp"

int main(int argc, char** argv) { return lvx::cli::main(argc, argv); }
