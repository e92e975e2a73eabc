#include <porthamil/cli.hpp>

int main(int argc, char** argv) { return porthamil::cli::run(argc, argv); }
