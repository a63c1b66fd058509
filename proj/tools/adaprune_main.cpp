#include "adaprune/cli.hpp"

int main(int argc, char** argv) { return adaprune::run_main(argc, argv); }
