#include "koopcert_cli/experiments.hpp"

int main(int argc, char** argv) { return koopcert::cli::run_cli(argc, argv); }
