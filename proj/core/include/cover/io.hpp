#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cover/lattice.hpp"
#include "cover/replication.hpp"

namespace cover {

/// Shortest round-trip decimal form, independent of the global locale.
std::string format_double(double value);

/// CSV with a header row. Column 1 is an ISO date (YYYY-MM-DD) or a numeric
/// time in years; the remaining columns are positive prices, one per asset.
PriceTable read_price_table(std::istream& in);
PriceTable read_price_table_file(const std::string& path);

/// time, wealth, cash, then fraction_i, shares_i for each asset.
void write_ledger_csv(std::ostream& out, const HedgeLedger& ledger);

/// step, upticks, stock, wealth.
void write_demon_csv(std::ostream& out, const std::vector<DemonRow>& rows);

/// time, wealth.
void write_backtest_csv(std::ostream& out, const BacktestResult& result);

}  // namespace cover
