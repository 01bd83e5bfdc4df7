#include "iaei/cli.hpp"

int main(int argc, char** argv) { return iaei::run_cli(argc, argv); }
