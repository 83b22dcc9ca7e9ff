#include "cli.hpp"

int main(int argc, char** argv) { return humancorpus::cli::run(argc, argv); }
