#include "cola/harness.hpp"

int main(int argc, char** argv) { return cola::cli_main(argc, argv); }
