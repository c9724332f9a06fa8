#include <bineq/cli.hpp>

int main(int argc, char** argv) { return bineq::cli::run(argc, argv); }
