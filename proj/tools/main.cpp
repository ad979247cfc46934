#include "hompol/commands.hpp"

int main(int argc, char** argv) { return hompol::run_cli(argc, argv); }
