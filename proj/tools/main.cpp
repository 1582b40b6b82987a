#include "cuspidal/cli.hpp"

int main(int argc, char** argv) { return cuspidal::cli::run(argc, argv); }
