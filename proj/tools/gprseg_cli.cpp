#include "gprseg/cli.hpp"

int main(int argc, char** argv) { return gprseg::run_cli(argc, argv); }
