#include "lzkit/commands.hpp"

int main(int argc, char** argv) { return lzkit::run_cli(argc, argv); }
