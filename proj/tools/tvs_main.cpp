#include "tvs/cli.hpp"

int main(int argc, char** argv) { return tvs::cli_main(argc, argv); }
