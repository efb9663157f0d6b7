#include "gme/cli.hpp"

int main(int argc, char** argv) { return gme::cli::run(argc, argv); }
