#include "rtaprop/cli/commands.hpp"

int main(int argc, char** argv) { return rtaprop::cli::run(argc, argv); }
