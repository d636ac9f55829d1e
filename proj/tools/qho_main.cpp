#include "qho/cli.hpp"

int main(int argc, char** argv) { return qho::cli::run(argc, argv); }
