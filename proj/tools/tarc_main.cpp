#include "tarc/cli.hpp"

int main(int argc, char** argv) { return tarc::run_cli(argc, argv); }
