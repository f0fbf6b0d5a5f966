#include "mixrate/cli.hpp"

int main(int argc, char **argv) { return mixrate::cli::dispatch(argc, argv); }
