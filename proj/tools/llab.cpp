#include "llab/report_cli.hpp"

int main(int argc, char** argv) { return llab::cli_main(argc, argv); }
