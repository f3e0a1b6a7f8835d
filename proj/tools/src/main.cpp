#include "boxcert/cli.hpp"

int main(int argc, char** argv) { return boxcert::cli::run(argc, argv); }
