#include "mflqg/cli.hpp"

int main(int argc, char** argv) { return mflqg::cli::cli_main(argc, argv); }
