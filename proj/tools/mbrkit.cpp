#include "mbrkit/cli.hpp"

int main(int argc, char** argv) { return mbrkit::run_main(argc, argv); }
