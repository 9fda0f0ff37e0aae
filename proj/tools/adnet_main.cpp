#include <adnet/cli.hpp>

int main(int argc, char** argv) { return adnet::cli::run(argc, argv); }
