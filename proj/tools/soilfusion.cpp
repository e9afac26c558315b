#include "soilfusion/cli.hpp"

int main(int argc, char** argv) { return soilfusion::cli::run(argc, argv); }
