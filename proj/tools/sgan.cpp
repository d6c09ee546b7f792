#include "sgan/cli.hpp"

int main(int argc, char** argv) { return sgan::cli::dispatch(argc, argv); }
