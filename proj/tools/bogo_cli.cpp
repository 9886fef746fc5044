#include "bogo/experiments.hpp"

int main(int argc, char** argv) { return bogo::cli_main(argc, argv); }
