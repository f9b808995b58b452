#include "hapauth/cli.hpp"

int main(int argc, char** argv) { return hapauth::cli::run(argc, argv); }
