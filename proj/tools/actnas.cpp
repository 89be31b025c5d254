#include "actnas/cli.hpp"

int main(int argc, char** argv) { return actnas::run_cli(argc, argv); }
