#include "hdabc/io.hpp"

int main(int argc, char** argv) { return hdabc::io::cli_main(argc, argv); }
