#include "varlux/cli.hpp"

int main(int argc, char** argv) { return varlux::cli::run(argc, argv); }
