#include "wba/cli.hpp"

int main(int argc, char** argv) { return wba::cli::run(argc, argv); }
