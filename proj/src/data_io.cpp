#include "chmm/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "chmm/error.hpp"

namespace chmm::io {

namespace {

std::string trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(begin, end - begin + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    fields.push_back(trim(std::string_view(line).substr(pos, comma - pos)));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return fields;
}

double parse_double(const std::string& text, std::size_t line) {
  std::string_view view = text;
  if (!view.empty() && view.front() == '+') view.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(view.data(), view.data() + view.size(), value);
  if (ec != std::errc() || ptr != view.data() + view.size() || view.empty()) {
    throw ParseError("expected a number, got '" + text + "'", line);
  }
  return value;
}

std::size_t parse_size(const std::string& text, std::size_t line) {
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw ParseError("expected a nonnegative integer, got '" + text + "'", line);
  }
  return value;
}

std::uint64_t parse_u64(const std::string& text, std::size_t line) {
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw ParseError("expected a nonnegative integer, got '" + text + "'", line);
  }
  return value;
}

bool parse_bool(const std::string& text, std::size_t line) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ParseError("expected a boolean, got '" + text + "'", line);
}

Timestamp parse_ts(const std::string& text, std::size_t line) {
  try {
    return parse_timestamp(text);
  } catch (const ParseError& e) {
    throw ParseError(e.what(), line);
  }
}

std::string num(double v) {
  char buf[40];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

// Column name -> index for a CSV header; throws if a required column is missing.
class Header {
 public:
  Header(const std::string& line, std::initializer_list<const char*> required) {
    const auto fields = split_csv(line);
    for (std::size_t k = 0; k < fields.size(); ++k) index_[fields[k]] = k;
    for (const char* name : required) {
      if (!index_.count(name)) throw ParseError(std::string("missing column '") + name + "'", 1);
    }
    width_ = fields.size();
  }
  std::size_t operator[](const std::string& name) const { return index_.at(name); }
  bool has(const std::string& name) const { return index_.count(name) > 0; }
  std::size_t width() const { return width_; }

 private:
  std::map<std::string, std::size_t> index_;
  std::size_t width_ = 0;
};

// Reads data rows after the header, skipping blank lines. Calls fn(fields, line_no).
template <typename Fn>
void for_each_row(std::istream& in, const Header& header, Fn&& fn) {
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != header.width()) {
      throw ParseError("expected " + std::to_string(header.width()) + " fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    }
    fn(fields, line_no);
  }
}

std::string read_header(std::istream& in, const char* what) {
  std::string line;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) return line;
  }
  throw ParseError(std::string(what) + " is empty");
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  return in;
}

Side parse_side(const std::string& text, std::size_t line) {
  if (text == "long") return Side::kLong;
  if (text == "short") return Side::kShort;
  throw ParseError("unknown side '" + text + "'", line);
}

ExitReason parse_exit_reason(const std::string& text, std::size_t line) {
  if (text == "stop") return ExitReason::kStop;
  if (text == "target") return ExitReason::kTarget;
  if (text == "end-of-data") return ExitReason::kEndOfData;
  throw ParseError("unknown exit reason '" + text + "'", line);
}

}  // namespace

// --- OHLC ------------------------------------------------------------------

OhlcLoad parse_ohlc_csv(std::istream& in) {
  const Header header(read_header(in, "OHLC file"), {"timestamp", "open", "high", "low", "close"});
  struct Row {
    OhlcBar bar;
    std::size_t line;
  };
  std::vector<Row> rows;
  for_each_row(in, header, [&](const std::vector<std::string>& f, std::size_t line) {
    OhlcBar bar;
    bar.timestamp = parse_ts(f[header["timestamp"]], line);
    bar.open = parse_double(f[header["open"]], line);
    bar.high = parse_double(f[header["high"]], line);
    bar.low = parse_double(f[header["low"]], line);
    bar.close = parse_double(f[header["close"]], line);
    if (!is_consistent(bar)) {
      throw ParseError("OHLC invariant violated (need low <= open, close <= high)", line);
    }
    rows.push_back({bar, line});
  });
  if (rows.empty()) throw ParseError("OHLC file has no data rows");

  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return a.bar.timestamp < b.bar.timestamp;
  });
  OhlcLoad out;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (k + 1 < rows.size() && rows[k + 1].bar.timestamp == rows[k].bar.timestamp) {
      out.warnings.push_back("duplicate timestamp " + format_timestamp(rows[k].bar.timestamp) +
                             " at line " + std::to_string(rows[k].line) +
                             " superseded by line " + std::to_string(rows[k + 1].line));
      continue;
    }
    out.bars.push_back(rows[k].bar);
  }
  return out;
}

OhlcLoad load_ohlc_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    return parse_ohlc_csv(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_ohlc_csv(std::ostream& out, const std::vector<OhlcBar>& bars) {
  out << "timestamp,open,high,low,close\n";
  for (const auto& b : bars) {
    out << format_timestamp(b.timestamp) << ',' << num(b.open) << ',' << num(b.high) << ','
        << num(b.low) << ',' << num(b.close) << '\n';
  }
}

AlignedPair align(const std::vector<OhlcBar>& s1, const std::vector<OhlcBar>& s2) {
  if (s1.empty() || s2.empty()) throw Error("cannot align an empty series");
  AlignedPair out;
  std::size_t a = 0;
  std::size_t b = 0;
  while (a < s1.size() || b < s2.size()) {
    if (b == s2.size() || (a < s1.size() && s1[a].timestamp < s2[b].timestamp)) {
      out.gaps.push_back(s1[a++].timestamp);
    } else if (a == s1.size() || s2[b].timestamp < s1[a].timestamp) {
      out.gaps.push_back(s2[b++].timestamp);
    } else {
      out.bars1.push_back(s1[a++]);
      out.bars2.push_back(s2[b++]);
    }
  }
  if (out.bars1.empty()) throw Error("series share no timestamps");
  return out;
}

// --- configuration ---------------------------------------------------------

System parse_system(const std::string& text) {
  if (text == "rsi") return System::kRsi;
  if (text == "cci") return System::kCci;
  throw ParseError("unknown system '" + text + "' (expected rsi or cci)");
}

Predictor parse_predictor(const std::string& text) {
  if (text == "baseline" || text == "none") return Predictor::kBaseline;
  if (text == "marginal") return Predictor::kMarginal;
  if (text == "viterbi") return Predictor::kViterbi;
  throw ParseError("unknown predictor '" + text + "' (expected baseline, marginal or viterbi)");
}

Fidelity parse_fidelity(const std::string& text) {
  if (text == "corrected") return Fidelity::kCorrected;
  if (text == "literal") return Fidelity::kLiteral;
  throw ParseError("unknown fidelity '" + text + "' (expected corrected or literal)");
}

std::string to_string(System s) { return s == System::kRsi ? "rsi" : "cci"; }

std::string to_string(Predictor p) {
  switch (p) {
    case Predictor::kBaseline:
      return "baseline";
    case Predictor::kMarginal:
      return "marginal";
    case Predictor::kViterbi:
      return "viterbi";
  }
  return "?";
}

std::string to_string(Fidelity f) { return f == Fidelity::kCorrected ? "corrected" : "literal"; }

std::string to_string(Side s) {
  switch (s) {
    case Side::kLong:
      return "long";
    case Side::kShort:
      return "short";
    case Side::kNone:
      return "none";
  }
  return "?";
}

std::string to_string(ExitReason r) {
  switch (r) {
    case ExitReason::kStop:
      return "stop";
    case ExitReason::kTarget:
      return "target";
    case ExitReason::kEndOfData:
      return "end-of-data";
  }
  return "?";
}

BacktestConfig parse_config(std::istream& in) {
  std::vector<std::tuple<std::string, std::string, std::size_t>> entries;
  std::string line;
  std::size_t line_no = 0;
  std::optional<System> system;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const std::string body = trim(line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", line_no);
    std::string key = trim(body.substr(0, eq));
    std::string value = trim(body.substr(eq + 1));
    if (key == "system") {
      try {
        system = parse_system(value);
      } catch (const ParseError& e) {
        throw ParseError(e.what(), line_no);
      }
      continue;
    }
    entries.emplace_back(std::move(key), std::move(value), line_no);
  }

  BacktestConfig cfg = BacktestConfig::defaults_for(system.value_or(System::kRsi));
  for (const auto& [key, value, ln] : entries) {
    try {
      if (key == "lookback") cfg.lookback = parse_size(value, ln);
      else if (key == "n_states") cfg.n_states = parse_size(value, ln);
      else if (key == "n_bins") cfg.n_bins = parse_size(value, ln);
      else if (key == "indicator_period") cfg.indicator_period = parse_size(value, ln);
      else if (key == "sma_period") cfg.sma_period = parse_size(value, ln);
      else if (key == "atr_period") cfg.atr_period = parse_size(value, ln);
      else if (key == "stop_multiple") cfg.stop_multiple = parse_double(value, ln);
      else if (key == "target_multiple") cfg.target_multiple = parse_double(value, ln);
      else if (key == "dynamic_allocation") cfg.dynamic_allocation = parse_bool(value, ln);
      else if (key == "predictor") cfg.predictor = parse_predictor(value);
      else if (key == "fidelity") cfg.fidelity = parse_fidelity(value);
      else if (key == "notional") cfg.notional = parse_double(value, ln);
      else if (key == "initial_capital") cfg.initial_capital = parse_double(value, ln);
      else if (key == "sweeps") cfg.fit.sweeps = parse_size(value, ln);
      else if (key == "rel_tol") cfg.fit.rel_tol = parse_double(value, ln);
      else if (key == "warm_start") cfg.fit.warm_start = parse_bool(value, ln);
      else if (key == "seed") cfg.fit.seed = parse_u64(value, ln);
      else throw ParseError("unknown key '" + key + "'", ln);
    } catch (const ParseError& e) {
      if (e.line() != 0) throw;
      throw ParseError(e.what(), ln);
    }
  }
  return cfg;
}

BacktestConfig load_config(const std::filesystem::path& path) {
  auto in = open_in(path);
  return parse_config(in);
}

void write_config(std::ostream& out, const BacktestConfig& cfg) {
  out << "system = " << to_string(cfg.system) << '\n'
      << "lookback = " << cfg.lookback << '\n'
      << "n_states = " << cfg.n_states << '\n'
      << "n_bins = " << cfg.n_bins << '\n'
      << "indicator_period = " << cfg.indicator_period << '\n'
      << "sma_period = " << cfg.sma_period << '\n'
      << "atr_period = " << cfg.atr_period << '\n'
      << "stop_multiple = " << num(cfg.stop_multiple) << '\n'
      << "target_multiple = " << num(cfg.target_multiple) << '\n'
      << "dynamic_allocation = " << (cfg.dynamic_allocation ? "true" : "false") << '\n'
      << "predictor = " << to_string(cfg.predictor) << '\n'
      << "fidelity = " << to_string(cfg.fidelity) << '\n'
      << "notional = " << num(cfg.notional) << '\n'
      << "initial_capital = " << num(cfg.initial_capital) << '\n'
      << "sweeps = " << cfg.fit.sweeps << '\n'
      << "rel_tol = " << num(cfg.fit.rel_tol) << '\n'
      << "warm_start = " << (cfg.fit.warm_start ? "true" : "false") << '\n'
      << "seed = " << cfg.fit.seed << '\n';
}

// --- parameters ------------------------------------------------------------

void write_params(std::ostream& out, const ChmmParams& p) {
  auto row = [&](std::span<const double> values) {
    for (std::size_t k = 0; k < values.size(); ++k) out << (k ? " " : "") << num(values[k]);
    out << '\n';
  };
  out << "n_states = " << p.n_states << '\n' << "n_bins = " << p.n_bins << '\n';
  for (std::size_t c = 0; c < kChains; ++c) {
    out << "[prior " << c + 1 << "]\n";
    row(p.priors[c]);
  }
  for (std::size_t from = 0; from < kChains; ++from) {
    for (std::size_t to = 0; to < kChains; ++to) {
      out << "[transition " << from + 1 << ' ' << to + 1 << "]\n";
      for (std::size_t i = 0; i < p.n_states; ++i) row(p.transitions[from][to].row(i));
    }
  }
  for (std::size_t c = 0; c < kChains; ++c) {
    out << "[emission " << c + 1 << "]\n";
    for (std::size_t j = 0; j < p.n_states; ++j) row(p.emissions[c].row(j));
  }
  out << "[coupling]\n";
  for (std::size_t from = 0; from < kChains; ++from) row(p.coupling[from]);
}

ChmmParams read_params(std::istream& in) {
  std::optional<std::size_t> n_states;
  std::optional<std::size_t> n_bins;
  std::map<std::string, std::vector<std::vector<double>>> sections;
  std::string current;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(line.substr(0, line.find('#')));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']') throw ParseError("unterminated section header", line_no);
      current = trim(body.substr(1, body.size() - 2));
      if (sections.count(current)) throw ParseError("duplicate section [" + current + "]", line_no);
      sections[current];
      continue;
    }
    if (current.empty()) {
      const auto eq = body.find('=');
      if (eq == std::string::npos) throw ParseError("expected 'key = value'", line_no);
      const std::string key = trim(body.substr(0, eq));
      const std::string value = trim(body.substr(eq + 1));
      if (key == "n_states") n_states = parse_size(value, line_no);
      else if (key == "n_bins") n_bins = parse_size(value, line_no);
      else throw ParseError("unknown key '" + key + "'", line_no);
      continue;
    }
    std::vector<double> values;
    std::istringstream fields(body);
    std::string token;
    while (fields >> token) values.push_back(parse_double(token, line_no));
    sections[current].push_back(std::move(values));
  }
  if (!n_states || !n_bins) throw ParseError("parameter file lacks n_states or n_bins");

  ChmmParams p = ChmmParams::uniform(*n_states, *n_bins);
  auto take = [&](const std::string& name, std::size_t rows, std::size_t cols) {
    const auto it = sections.find(name);
    if (it == sections.end()) throw ParseError("missing section [" + name + "]");
    const auto& data = it->second;
    if (data.size() != rows) throw ParseError("section [" + name + "] has wrong row count");
    for (const auto& r : data) {
      if (r.size() != cols) throw ParseError("section [" + name + "] has wrong column count");
    }
    return data;
  };
  const std::size_t n = *n_states;
  const std::size_t m = *n_bins;
  for (std::size_t c = 0; c < kChains; ++c) {
    p.priors[c] = take("prior " + std::to_string(c + 1), 1, n).front();
    const auto e = take("emission " + std::to_string(c + 1), n, m);
    for (std::size_t j = 0; j < n; ++j) std::copy(e[j].begin(), e[j].end(), p.emissions[c].row(j).begin());
  }
  for (std::size_t from = 0; from < kChains; ++from) {
    for (std::size_t to = 0; to < kChains; ++to) {
      const auto a = take("transition " + std::to_string(from + 1) + " " + std::to_string(to + 1), n, n);
      for (std::size_t i = 0; i < n; ++i) {
        std::copy(a[i].begin(), a[i].end(), p.transitions[from][to].row(i).begin());
      }
    }
  }
  const auto theta = take("coupling", kChains, kChains);
  for (std::size_t from = 0; from < kChains; ++from) {
    for (std::size_t to = 0; to < kChains; ++to) p.coupling[from][to] = theta[from][to];
  }
  if (sections.size() != 2 * kChains + kChains * kChains + 1) {
    throw ParseError("parameter file has unexpected sections");
  }
  return p;
}

ChmmParams load_params(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_params(in);
}

void save_params(const std::filesystem::path& path, const ChmmParams& params) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  write_params(out, params);
}

// --- observations ----------------------------------------------------------

void write_observations_csv(std::ostream& out, const ObservationSequence& obs,
                            const std::array<std::vector<std::size_t>, kChains>* states) {
  out << (states ? "t,state1,state2,obs1,obs2\n" : "t,obs1,obs2\n");
  for (std::size_t t = 0; t < obs.length(); ++t) {
    out << t << ',';
    if (states) out << (*states)[0][t] << ',' << (*states)[1][t] << ',';
    out << obs.bins[0][t] << ',' << obs.bins[1][t] << '\n';
  }
}

LabelledObservations read_observations_csv(std::istream& in) {
  const Header header(read_header(in, "observation file"), {"obs1", "obs2"});
  const bool labelled = header.has("state1") && header.has("state2");
  LabelledObservations out;
  if (labelled) out.states.emplace();
  for_each_row(in, header, [&](const std::vector<std::string>& f, std::size_t line) {
    out.observations.bins[0].push_back(parse_size(f[header["obs1"]], line));
    out.observations.bins[1].push_back(parse_size(f[header["obs2"]], line));
    if (labelled) {
      (*out.states)[0].push_back(parse_size(f[header["state1"]], line));
      (*out.states)[1].push_back(parse_size(f[header["state2"]], line));
    }
  });
  if (out.observations.length() == 0) throw ParseError("observation file has no data rows");
  return out;
}

// --- backtest outputs ------------------------------------------------------

void write_trades_csv(std::ostream& out, const std::vector<TradeRecord>& trades) {
  out << "entry_time,side,size,entry_price,stop_price,target_price,exit_time,exit_price,"
         "exit_reason,pnl\n";
  for (const auto& t : trades) {
    out << format_timestamp(t.entry_time) << ',' << to_string(t.side) << ',' << num(t.size) << ','
        << num(t.entry_price) << ',' << num(t.stop_price) << ',' << num(t.target_price) << ','
        << format_timestamp(t.exit_time) << ',' << num(t.exit_price) << ','
        << to_string(t.exit_reason) << ',' << num(t.pnl) << '\n';
  }
}

std::vector<TradeRecord> read_trades_csv(std::istream& in) {
  const Header header(read_header(in, "trades file"),
                      {"entry_time", "side", "size", "entry_price", "stop_price", "target_price",
                       "exit_time", "exit_price", "exit_reason", "pnl"});
  std::vector<TradeRecord> trades;
  for_each_row(in, header, [&](const std::vector<std::string>& f, std::size_t line) {
    TradeRecord t;
    t.entry_time = parse_ts(f[header["entry_time"]], line);
    t.side = parse_side(f[header["side"]], line);
    t.size = parse_double(f[header["size"]], line);
    t.entry_price = parse_double(f[header["entry_price"]], line);
    t.stop_price = parse_double(f[header["stop_price"]], line);
    t.target_price = parse_double(f[header["target_price"]], line);
    t.exit_time = parse_ts(f[header["exit_time"]], line);
    t.exit_price = parse_double(f[header["exit_price"]], line);
    t.exit_reason = parse_exit_reason(f[header["exit_reason"]], line);
    t.pnl = parse_double(f[header["pnl"]], line);
    trades.push_back(t);
  });
  return trades;
}

void write_equity_csv(std::ostream& out, const EquityCurve& equity) {
  out << "timestamp,equity\n";
  for (const auto& p : equity) out << format_timestamp(p.timestamp) << ',' << num(p.equity) << '\n';
}

EquityCurve read_equity_csv(std::istream& in) {
  const Header header(read_header(in, "equity file"), {"timestamp", "equity"});
  EquityCurve curve;
  for_each_row(in, header, [&](const std::vector<std::string>& f, std::size_t line) {
    curve.push_back({parse_ts(f[header["timestamp"]], line),
                     parse_double(f[header["equity"]], line)});
  });
  return curve;
}

void write_diagnostics_csv(std::ostream& out, const std::vector<BarDiagnostics>& rows) {
  out << "timestamp,predicted_value_1,predicted_state_1,transition_prob_1,"
         "predicted_value_2,predicted_state_2,transition_prob_2\n";
  for (const auto& r : rows) {
    out << format_timestamp(r.timestamp);
    for (std::size_t c = 0; c < kChains; ++c) {
      out << ',' << num(r.predicted_value[c]) << ',' << r.predicted_state[c] << ','
          << num(r.transition_prob[c]);
    }
    out << '\n';
  }
}

std::vector<BarDiagnostics> read_diagnostics_csv(std::istream& in) {
  const Header header(read_header(in, "diagnostics file"),
                      {"timestamp", "predicted_value_1", "predicted_state_1", "transition_prob_1",
                       "predicted_value_2", "predicted_state_2", "transition_prob_2"});
  std::vector<BarDiagnostics> rows;
  for_each_row(in, header, [&](const std::vector<std::string>& f, std::size_t line) {
    BarDiagnostics r;
    r.timestamp = parse_ts(f[header["timestamp"]], line);
    for (std::size_t c = 0; c < kChains; ++c) {
      const std::string suffix = "_" + std::to_string(c + 1);
      r.predicted_value[c] = parse_double(f[header["predicted_value" + suffix]], line);
      r.predicted_state[c] = parse_size(f[header["predicted_state" + suffix]], line);
      r.transition_prob[c] = parse_double(f[header["transition_prob" + suffix]], line);
    }
    rows.push_back(r);
  });
  return rows;
}

void write_stats(std::ostream& out, const std::optional<PerfStats>& stats) {
  if (!stats) {
    out << "ratio = undefined\n";
    return;
  }
  out << "ret = " << num(stats->ret) << '\n'
      << "vol = " << num(stats->vol) << '\n'
      << "ratio = " << num(stats->ratio) << '\n'
      << "delta_ratio = " << num(stats->delta_ratio) << '\n';
}

std::optional<PerfStats> read_stats(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", line_no);
    kv[trim(body.substr(0, eq))] = trim(body.substr(eq + 1));
  }
  if (kv.count("ratio") && kv["ratio"] == "undefined") return std::nullopt;
  for (const char* key : {"ret", "vol", "ratio", "delta_ratio"}) {
    if (!kv.count(key)) throw ParseError(std::string("stats file lacks '") + key + "'");
  }
  PerfStats s;
  s.ret = parse_double(kv["ret"], 0);
  s.vol = parse_double(kv["vol"], 0);
  s.ratio = parse_double(kv["ratio"], 0);
  s.delta_ratio = parse_double(kv["delta_ratio"], 0);
  return s;
}

void write_fit_records(std::ostream& out, const std::vector<FitRecord>& records) {
  for (const auto& r : records) {
    nlohmann::json j;
    j["window_end"] = format_timestamp(r.window_end);
    j["sweeps"] = r.sweeps;
    j["log_likelihood"] = r.log_likelihood_trace;
    j["smoothed"] = r.smoothed;
    out << j.dump() << '\n';
  }
}

std::vector<FitRecord> read_fit_records(std::istream& in) {
  std::vector<FitRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      FitRecord r;
      r.window_end = parse_timestamp(j.at("window_end").get<std::string>());
      r.sweeps = j.at("sweeps").get<std::size_t>();
      r.log_likelihood_trace = j.at("log_likelihood").get<std::vector<double>>();
      r.smoothed = j.at("smoothed").get<bool>();
      records.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return records;
}

}  // namespace chmm::io
