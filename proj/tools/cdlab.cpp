#include "cdflow/cli.hpp"

int main(int argc, char** argv) { return cdflow::run_cli(argc, argv); }
