#include "dress/cli.hpp"

int main(int argc, char** argv) { return dress::run_cli(argc, argv); }
