#include "glyphlab/cli.hpp"

int main(int argc, char** argv) { return glyphlab::run_cli(argc, argv); }
