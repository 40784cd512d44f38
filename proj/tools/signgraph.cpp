#include "signgraph/cli.hpp"

int main(int argc, char** argv) { return signgraph::run_cli(argc, argv); }
