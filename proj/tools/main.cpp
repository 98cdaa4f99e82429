#include "hiercloud/cli.hpp"

int main(int argc, char** argv) { return hiercloud::cli::run(argc, argv); }
