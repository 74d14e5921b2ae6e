#include <sstream>

#include "doctest.h"
#include "cover/errors.hpp"
#include "cover/io.hpp"

using namespace cover;

namespace {

PriceTable parse(const std::string& text) {
    std::istringstream in(text);
    return read_price_table(in);
}

void expect_error(const std::string& text, std::size_t line, std::size_t column) {
    try {
        parse(text);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == line);
        CHECK(e.column() == column);
    }
}

}  // namespace

TEST_CASE("price table parsing") {
    SUBCASE("ISO dates") {
        const PriceTable t = parse("date,spx,gold\n2000-01-01,100,50\n2001-01-01,110,55\n\n2002-01-01,90,70\n");
        CHECK(t.assets == std::vector<std::string>{"spx", "gold"});
        REQUIRE(t.years.size() == 3);
        CHECK(t.years[0] == 0.0);
        CHECK(t.years[1] == doctest::Approx(366.0 / 365.25));
        CHECK(t.prices(2, 1) == 70.0);
        CHECK(t.labels[2] == "2002-01-01");
    }
    SUBCASE("numeric times are relative to the first row") {
        const PriceTable t = parse("t,x\n1990.5,1\n1991.5,2\n");
        CHECK(t.years[1] == doctest::Approx(1.0));
    }
    SUBCASE("quoted fields and CRLF") {
        const PriceTable t = parse("\"t\",\"x\"\r\n0,\"1.5\"\r\n1,2\r\n");
        CHECK(t.prices(0, 0) == 1.5);
    }
    SUBCASE("errors carry line and column") {
        expect_error("", 1, 1);
        expect_error("t\n", 1, 1);
        expect_error("t,x\n0,1\n1,abc\n", 3, 3);
        expect_error("t,x\n0,1\n1,2,3\n", 3, 5);
        expect_error("t,x\n0,1\nyesterday,2\n", 3, 1);
        expect_error("t,x\n0,1\n0,2\n", 3, 1);
        expect_error("t,x\n0,1\n1,-2\n", 3, 3);
        expect_error("t,x\n2000-01-01,1\n3,2\n", 3, 1);
    }
    CHECK_THROWS_AS(read_price_table_file("/nonexistent/prices.csv"), IoError);
}

TEST_CASE("CSV writers") {
    HedgeLedger ledger;
    ledger.times = {0.0, 0.5};
    ledger.wealth = {1.0, 1.25};
    ledger.cash = {0.5, 1.25};
    ledger.fractions = (Matrix(2, 2) << 0.25, 0.25, 0, 0).finished();
    ledger.shares = (Matrix(2, 2) << 0.125, 0.5, 0, 0).finished();
    ledger.prices = (Matrix(2, 2) << 2, 0.5, 3, 1).finished();
    std::ostringstream out;
    write_ledger_csv(out, ledger);
    CHECK(out.str() == "time,wealth,cash,fraction_1,shares_1,fraction_2,shares_2\n0,1,0.5,0.25,0.125,0.25,0.5\n0.5,1.25,1.25,0,0,0,0\n");

    std::ostringstream demon;
    write_demon_csv(demon, {{0, 0, 1.0, 1.0}, {1, 1, 2.0, 1.5}});
    CHECK(demon.str() == "step,upticks,stock,wealth\n0,0,1,1\n1,1,2,1.5\n");

    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1e300) == "1e+300");
}
