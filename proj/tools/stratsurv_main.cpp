#include "stratsurv/cli.hpp"

int main(int argc, char** argv) { return stratsurv::cli_main(argc, argv); }
