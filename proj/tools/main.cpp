#include "cli.hpp"

int main(int argc, char** argv) { return r2d2surv::cli::run(argc, argv); }
