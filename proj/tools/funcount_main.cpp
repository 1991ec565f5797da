#include "funcount/cli.hpp"

int main(int argc, char** argv) { return funcount::run_cli(argc, argv); }
