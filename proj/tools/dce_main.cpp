#include "dce/cli.hpp"

int main(int argc, char** argv) { return dce::cli_main(argc, argv); }
