#include "greenbench/bench.hpp"

int main(int argc, char** argv)
{
	return greenbench::bench::cli_main(argc, argv);
}
