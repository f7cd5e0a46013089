#include "lielio/cli.hpp"

int main(int argc, char** argv) { return lielio::run_cli(argc, argv); }
