#include "recursep/cli.hpp"

int main(int argc, char** argv) { return recursep::run_cli(argc, argv); }
