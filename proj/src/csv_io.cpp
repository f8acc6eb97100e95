#include "ffpc/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace ffpc
{
namespace
{
std::string strip(const std::string &s)
{
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos)
        return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

void put_comments(std::ostream &os, const std::vector<std::string> &comments)
{
    for (const auto &c : comments)
        os << "# " << c << "\n";
}

// Shortest text that reads back to the same double.
std::string num(double v)
{
    if (std::isnan(v))
        return "nan";
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

// Iterates data rows: skips blanks and comments, checks the header.
class TableReader
{
public:
    TableReader(std::istream &is, std::string header, std::vector<std::string> *comments)
        : is_(is), header_(std::move(header)), comments_(comments)
    {
    }

    // Returns false at end of input.
    bool next(std::vector<double> &fields)
    {
        std::string raw;
        while (std::getline(is_, raw))
        {
            ++line_;
            const std::string s = strip(raw);
            if (s.empty())
                continue;
            if (s.front() == '#')
            {
                if (comments_)
                    comments_->push_back(strip(s.substr(1)));
                continue;
            }
            if (!seen_header_)
            {
                if (s != header_)
                    throw ParseError("expected header '" + header_ + "', got '" + s + "'", line_);
                seen_header_ = true;
                continue;
            }
            fields.clear();
            std::size_t pos = 0;
            while (true)
            {
                const auto comma = s.find(',', pos);
                const std::string cell = strip(s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
                fields.push_back(parse_cell(cell));
                if (comma == std::string::npos)
                    break;
                pos = comma + 1;
            }
            return true;
        }
        if (!seen_header_)
            throw ParseError(line_ == 0 ? "empty file" : "missing header '" + header_ + "'", std::max<std::size_t>(line_, 1));
        return false;
    }

    std::size_t line() const { return line_; }

private:
    double parse_cell(const std::string &cell) const
    {
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v))
            throw ParseError("cannot parse number '" + cell + "'", line_);
        return v;
    }

    std::istream &is_;
    std::string header_;
    std::vector<std::string> *comments_;
    std::size_t line_ = 0;
    bool seen_header_ = false;
};

void expect_columns(const std::vector<double> &f, std::size_t n, std::size_t line)
{
    if (f.size() != n)
        throw ParseError("expected " + std::to_string(n) + " columns, got " + std::to_string(f.size()), line);
}
} // namespace

std::vector<std::string> comment_lines(const std::string &text)
{
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
        out.push_back(line);
    return out;
}

void write_knife_edge(std::ostream &os, const KnifeEdgeDataset &data, const std::vector<std::string> &comments)
{
    put_comments(os, comments);
    os << kKnifeEdgeHeader << "\n";
    for (const auto &s : data)
        os << num(s.z * 1e6) << "," << num(s.knife_position * 1e6) << "," << num(s.power_fraction) << "\n";
}

void write_spectrum(std::ostream &os, const TransmissionSpectrum &s, const std::vector<std::string> &comments)
{
    put_comments(os, comments);
    os << kSpectrumHeader << "\n";
    for (std::size_t i = 0; i < s.detuning.size(); ++i)
        os << num(s.detuning[i]) << "," << num(s.intensity[i]) << "\n";
}

void write_coupling(std::ostream &os, const CouplingSet &c, const std::vector<std::string> &comments)
{
    put_comments(os, comments);
    os << kCouplingHeader << "\n";
    for (const auto &[o, eta] : c.entries)
        os << o.n << "," << o.m << "," << num(eta) << "\n";
}

void write_sweep(std::ostream &os, const std::vector<SweepRow> &rows, const std::vector<std::string> &comments)
{
    put_comments(os, comments);
    os << kSweepHeader << "\n";
    for (const auto &r : rows)
    {
        os << num(r.length * 1e6) << ",";
        if (r.status == SweepStatus::unstable)
            os << "nan,nan,nan,nan,nan,nan,nan,";
        else
            os << num(r.eta00) << "," << num(r.beta) << "," << num(r.finesse) << "," << num(r.t00) << ","
               << num(r.waist * 1e6) << "," << num(r.waist_from_mirror1 * 1e6) << "," << num(r.fsr * 1e-9) << ",";
        os << to_string(r.status) << "\n";
    }
}

KnifeEdgeDataset read_knife_edge(std::istream &is, std::vector<std::string> *comments)
{
    TableReader reader(is, kKnifeEdgeHeader, comments);
    KnifeEdgeDataset out;
    std::vector<double> f;
    while (reader.next(f))
    {
        expect_columns(f, 3, reader.line());
        if (f[2] < 0.0 || f[2] > 1.0)
            throw ParseError("power_fraction must lie in [0, 1]", reader.line());
        out.push_back({f[0] * 1e-6, f[1] * 1e-6, f[2]});
    }
    if (out.empty())
        throw ParseError("no data rows", std::max<std::size_t>(reader.line(), 1));
    return out;
}

TransmissionSpectrum read_spectrum(std::istream &is, std::vector<std::string> *comments)
{
    TableReader reader(is, kSpectrumHeader, comments);
    TransmissionSpectrum out;
    std::vector<double> f;
    while (reader.next(f))
    {
        expect_columns(f, 2, reader.line());
        if (!out.detuning.empty() && f[0] <= out.detuning.back())
            throw ParseError("detuning must increase strictly", reader.line());
        out.detuning.push_back(f[0]);
        out.intensity.push_back(f[1]);
    }
    if (out.detuning.empty())
        throw ParseError("no data rows", std::max<std::size_t>(reader.line(), 1));
    return out;
}

CouplingSet read_coupling(std::istream &is, std::vector<std::string> *comments)
{
    TableReader reader(is, kCouplingHeader, comments);
    CouplingSet out;
    std::vector<double> f;
    while (reader.next(f))
    {
        expect_columns(f, 3, reader.line());
        if (f[0] != std::floor(f[0]) || f[1] != std::floor(f[1]) || f[0] < 0 || f[1] < 0)
            throw ParseError("mode orders must be non-negative integers", reader.line());
        const ModeOrder o{int(f[0]), int(f[1])};
        if (out.entries.count(o))
            throw ParseError("duplicate mode order", reader.line());
        out.entries[o] = f[2];
        out.max_order = std::max(out.max_order, o.total());
    }
    out.validate();
    return out;
}

} // namespace ffpc
