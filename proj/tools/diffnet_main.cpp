#include "diffnet/harness.hpp"

int main(int argc, char** argv) { return diffnet::cli_main(argc, argv); }
