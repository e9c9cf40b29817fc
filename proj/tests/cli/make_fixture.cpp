// Writes left.pgm, right.pgm and gt.pfm (random-dot stereo pair) into a directory.
#include <corrkit/formats.hpp>

#include "oracles.hpp"

#include <cstdio>
#include <string>

int main(int argc, char** argv)
{
    if (argc != 2) {
        std::fprintf(stderr, "usage: %s <dir>\n", argv[0]);
        return 2;
    }
    const std::string dir = argv[1];
    const auto s = oracle::random_dot_stereogram(64, 48, 4, 0.1, 7);
    oracle::write_pgm(dir + "/left.pgm", s.left);
    oracle::write_pgm(dir + "/right.pgm", s.right);
    corrkit::write_file(dir + "/gt.pfm", corrkit::write_pfm(s.gt));
    return 0;
}
