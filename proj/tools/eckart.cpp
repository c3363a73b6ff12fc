#include "eckart/cli.hpp"

int main(int argc, char** argv) { return eckart::cli_main(argc, argv); }
