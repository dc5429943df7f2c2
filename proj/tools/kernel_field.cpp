#include "kfield/cli.hpp"

int main(int argc, char** argv) { return kfield::run_cli(argc, argv); }
