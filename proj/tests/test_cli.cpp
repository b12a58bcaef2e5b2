#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "covqt/image.hpp"
#include "covqt/io.hpp"
#include "support/synthetic.hpp"

namespace {

const std::string cli = COVQT_CLI_PATH;

int run(const std::string& args, const std::string& log = "cli_log.txt") {
    const std::string cmd = cli + " " + args + " >" + log + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("cli end to end: sample, build, knn") {
    const covqt::Image img = testsupport::spiral_galaxy_image(64, 48);
    covqt::write_pnm(img, "cli_galaxy.pgm");

    REQUIRE(run("sample --image cli_galaxy.pgm --n 800 --seed 5 --out cli_pts.csv") == 0);
    const auto pts = covqt::read_point_csv("cli_pts.csv");
    REQUIRE(pts.size() == 800);

    REQUIRE(run("build --points cli_pts.csv --out cli_tree.cqt") == 0);

    // query file: the first data point plus one background position
    covqt::write_point_csv("cli_queries.csv",
                           std::vector<covqt::DataPoint>{{0, pts[0].coords},
                                                         {1, covqt::Vec{5.0, 5.0}}});
    REQUIRE(run("knn --tree cli_tree.cqt --queries cli_queries.csv --k 3 --out cli_knn.csv") == 0);

    std::ifstream res("cli_knn.csv");
    std::string header, row0;
    REQUIRE(std::getline(res, header));
    CHECK(header == "query_id,k,nodes_visited,insertions,neighbors,distances");
    REQUIRE(std::getline(res, row0));
    // the self-query's nearest neighbor is itself at distance zero
    CHECK(row0.find(",0 ") != std::string::npos);
    const std::size_t dist_field = row0.rfind(',');
    CHECK(row0.substr(dist_field + 1, 2) == "0 ");
}

TEST_CASE("cli aknn reports iterations and metric eigenvalues") {
    const covqt::Image img = testsupport::spiral_galaxy_image(64, 48);
    covqt::write_pnm(img, "cli_galaxy2.pgm");
    REQUIRE(run("sample --image cli_galaxy2.pgm --n 1500 --seed 6 --out cli_pts2.csv") == 0);
    REQUIRE(run("build --points cli_pts2.csv --out cli_tree2.cqt") == 0);
    {
        std::ofstream q("cli_queries2.csv");
        q << "id,x0,x1\n0,32.0,24.0\n";
    }
    REQUIRE(run("aknn --tree cli_tree2.cqt --queries cli_queries2.csv --k 64 "
                "--out cli_aknn.csv") == 0);
    std::ifstream res("cli_aknn.csv");
    std::string header, row;
    REQUIRE(std::getline(res, header));
    CHECK(header ==
          "query_id,k,nodes_visited,insertions,iterations,converged,metric_eigenvalues,"
          "neighbors,xi2");
    REQUIRE(std::getline(res, row));
    // fields: query_id,k,nodes,insertions,iterations,converged,...
    std::stringstream ss(row);
    std::string field;
    for (int i = 0; i < 5; ++i) REQUIRE(std::getline(ss, field, ','));
    const int iterations = std::stoi(field);
    CHECK(iterations >= 1);
    CHECK(iterations <= 50);
    REQUIRE(std::getline(ss, field, ','));
    CHECK(field == "1"); // converged
}

TEST_CASE("cli determinism: same seed, byte-identical outputs") {
    const covqt::Image img = testsupport::spiral_galaxy_image(48, 36);
    covqt::write_pnm(img, "cli_galaxy3.pgm");

    REQUIRE(run("sample --image cli_galaxy3.pgm --n 600 --seed 9 --out cli_s1.csv") == 0);
    REQUIRE(run("sample --image cli_galaxy3.pgm --n 600 --seed 9 --out cli_s2.csv") == 0);
    CHECK(slurp("cli_s1.csv") == slurp("cli_s2.csv"));

    REQUIRE(run("build --points cli_s1.csv --out cli_t1.cqt") == 0);
    REQUIRE(run("build --points cli_s1.csv --out cli_t2.cqt") == 0);
    CHECK(slurp("cli_t1.cqt") == slurp("cli_t2.cqt"));

    REQUIRE(run("bench --points cli_s1.csv --queries 30 --k-list 4,8,16 --seed 3 "
                "--no-timing --out-csv cli_b1.csv --out-dat cli_b1.dat") == 0);
    REQUIRE(run("bench --points cli_s1.csv --queries 30 --k-list 4,8,16 --seed 3 "
                "--no-timing --out-csv cli_b2.csv --out-dat cli_b2.dat") == 0);
    CHECK(slurp("cli_b1.csv") == slurp("cli_b2.csv"));
    CHECK(slurp("cli_b1.dat") == slurp("cli_b2.dat"));
}

TEST_CASE("cli density and tessellate produce images") {
    const covqt::Image img = testsupport::spiral_galaxy_image(48, 36);
    covqt::write_pnm(img, "cli_galaxy4.pgm");
    REQUIRE(run("sample --image cli_galaxy4.pgm --n 900 --seed 2 --out cli_pts4.csv") == 0);
    REQUIRE(run("build --points cli_pts4.csv --out cli_tree4.cqt") == 0);
    REQUIRE(run("density --tree cli_tree4.cqt --grid 16x12 --k 24 "
                "--out-pgm cli_density.pgm --out-csv cli_density.csv") == 0);
    const covqt::Image field = covqt::read_pnm("cli_density.pgm");
    CHECK(field.width == 16);
    CHECK(field.height == 12);

    REQUIRE(run("tessellate --image cli_galaxy4.pgm --tolerance 0.2 --dim-rule ratio:0.5 "
                "--levels 4 --out cli_mosaic.pgm") == 0);
    const covqt::Image mosaic = covqt::read_pnm("cli_mosaic.pgm");
    CHECK(mosaic.width == 48);
    CHECK(mosaic.height == 36);
}

TEST_CASE("cli rejects malformed input without crashing") {
    SUBCASE("unknown flag") {
        CHECK(run("knn --definitely-not-a-flag 1") != 0);
    }
    SUBCASE("missing file") {
        CHECK(run("build --points nope_does_not_exist.csv --out x.cqt") != 0);
    }
    SUBCASE("malformed point file reports file and line") {
        {
            std::ofstream bad("cli_bad.csv");
            bad << "1.0,2.0\n3.0\n";
        }
        CHECK(run("build --points cli_bad.csv --out x.cqt", "cli_bad_log.txt") != 0);
        const std::string log = slurp("cli_bad_log.txt");
        CHECK(log.find("cli_bad.csv:2") != std::string::npos);
    }
    SUBCASE("corrupt tree file") {
        {
            std::ofstream bad("cli_bad.cqt", std::ios::binary);
            bad << "NOPE garbage";
        }
        {
            std::ofstream q("cli_q.csv");
            q << "0.5,0.5\n";
        }
        CHECK(run("knn --tree cli_bad.cqt --queries cli_q.csv --k 1 --out x.csv") != 0);
    }
}
