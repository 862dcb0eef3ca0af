#include "nmkit_cli.hpp"

int main(int argc, char** argv) { return nmkit::cli::run(argc, argv); }
