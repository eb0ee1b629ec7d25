#include "spinmix/cli.hpp"

int main(int argc, char** argv)
{
    return spinmix::cli_main(argc, argv);
}
