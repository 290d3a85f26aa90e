#include "mulearn/cli.hpp"

int main(int argc, char** argv) { return mulearn::cli::run(argc, argv); }
