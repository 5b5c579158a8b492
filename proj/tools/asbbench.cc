#include "asb/cli.h"

int main(int argc, char** argv) { return asb::dispatch(argc, argv); }
