#include "oscillat/cli.hpp"

int main(int argc, char** argv) { return oscillat::run_cli(argc, argv); }
