#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace footlab::stats {

/// One subject: manual tape measurements and the four image-based values, all cm.
struct PairedRecord {
    int number = 0;
    double manual_length = 0.0;
    double manual_width = 0.0;
    double manual_height = 0.0;
    double length_side = 0.0;
    double length_under = 0.0;
    double height = 0.0;
    double width = 0.0;
};

struct PairedDataset {
    std::vector<PairedRecord> rows;

    /// Values of one named column (as spelled in the CSV header). Throws SchemaError.
    std::vector<double> column(std::string_view name) const;
};

/// Header must contain every column of kDatasetColumns (any order, extra columns ignored).
/// Schema errors name the column and the 1-based data row.
inline constexpr std::string_view kDatasetColumns[] = {"number",      "manual_length", "manual_width",
                                                       "manual_height", "length_side", "length_under",
                                                       "height",      "width"};

PairedDataset parse_dataset(std::string_view csv);
PairedDataset load_dataset(const std::string& path);

struct DescriptiveStats {
    double mean = 0.0;
    double se_mean = 0.0;
    double stdev = 0.0;
    double minimum = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double maximum = 0.0;
};

/// Mean of |actual - measured|. Throws EmptyInput, InvalidArgument on length mismatch.
double mae(std::span<const double> actual, std::span<const double> measured);

/// Quantile of sorted data at rank p(n+1), linearly interpolated and clamped to the ends.
double quantile_sorted(std::span<const double> sorted, double p);

/// Sample (n-1) statistics. Throws InsufficientData when n < 2.
DescriptiveStats descriptive(std::span<const double> v);

/// Throws InsufficientData, InvalidArgument on length mismatch, ZeroVariance.
double pearson(std::span<const double> x, std::span<const double> y);

/// OneSided takes the tail in the direction of the observed statistic.
enum class Tail { TwoSided, OneSided };

struct TestResult {
    double statistic = 0.0;
    double df1 = 0.0;
    double df2 = 0.0;  ///< unused for the t test
    double p_value = 1.0;
};

/// Welch unequal-variance two-sample t test.
TestResult t_test(std::span<const double> x, std::span<const double> y, Tail tail = Tail::TwoSided);

/// Variance ratio var(x)/var(y) against F(nx-1, ny-1). Two-sided p = min(1, 2 * smaller tail).
TestResult f_test(std::span<const double> x, std::span<const double> y, Tail tail = Tail::TwoSided);

/// Regularized incomplete beta I_x(a, b), continued fraction by modified Lentz.
double incomplete_beta(double a, double b, double x);

/// P(T <= t) for Student's t with `df` degrees of freedom.
double student_t_cdf(double t, double df);

/// P(F <= f) for the F distribution.
double f_cdf(double f, double df1, double df2);

/// One column of the validation report: image-based variable against its manual reference.
struct ReportColumn {
    std::string variable;
    DescriptiveStats stats;
    TestResult t;
    TestResult f;
    double pearson = 0.0;
    double mae = 0.0;
};

/// Length side, Length under, Height, Width, each paired with the matching manual column.
std::vector<ReportColumn> validation_report(const PairedDataset& data, Tail tail = Tail::TwoSided);

/// Rows: Variable, Mean, SE Mean, StDev, Minimum, Q1, Median, Q3, Maximum,
/// t-test p-value, f-test p-value, Pearson correlation, Mean absolute error.
void write_report_csv(std::ostream& out, const std::vector<ReportColumn>& report);

}  // namespace footlab::stats
