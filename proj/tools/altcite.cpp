#include "altcite/cli.hpp"

int main(int argc, char** argv) { return altcite::cli::run(argc, argv); }
