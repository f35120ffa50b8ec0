#include "cdbin/cli.hpp"

int main(int argc, char** argv) { return cdbin::cli::run(argc, argv); }
