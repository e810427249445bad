#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dealbench/money.hpp"

namespace dealbench::catalog {

struct CatalogError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SchemaError : CatalogError {
    SchemaError(std::size_t index, const std::string& what)
        : CatalogError("record " + std::to_string(index) + ": " + what), record_index(index) {}
    std::size_t record_index;
};
struct InvariantError : CatalogError {
    InvariantError(std::size_t index, std::string name, const std::string& what)
        : CatalogError("record " + std::to_string(index) + " (" + name + "): " + what),
          record_index(index),
          product_name(std::move(name)) {}
    std::size_t record_index;
    std::string product_name;
};

enum class Category { electronics, motor_vehicle, real_estate, other };

std::string to_string(Category c);
Category category_from_string(std::string_view s);  // unknown -> other

enum class BudgetLevel { high, retail, mid, wholesale, low };

inline constexpr std::array<BudgetLevel, 5> kAllBudgetLevels = {
    BudgetLevel::high, BudgetLevel::retail, BudgetLevel::mid, BudgetLevel::wholesale,
    BudgetLevel::low};

std::string to_string(BudgetLevel level);
std::optional<BudgetLevel> budget_level_from_string(std::string_view s);

struct Product {
    std::string name;
    Money retail_price;
    Money wholesale_price;
    std::string features;
    std::string reference;
    Category category = Category::other;

    bool operator==(const Product&) const = default;
};

/// Strips currency symbol, commas and surrounding whitespace.
Money parse_price(std::string_view raw);

// Source is a JSON array or JSON-lines stream of objects carrying the keys
// "Product Name", "Retail Price", "Wholesale Price", "Features", "Reference"
// (optional "Category"). Input order is preserved. Rejects any record with
// wholesale >= retail.
std::vector<Product> load_catalog(std::istream& source);
std::vector<Product> load_catalog_text(std::string_view text);
std::vector<Product> load_catalog_file(const std::filesystem::path& path);

/// Normalized echo: JSON array with the same keys, prices as "$<amount>".
std::string serialize_catalog(const std::vector<Product>& products);

// Budget schedule: high = retail*1.2, retail, mid = (retail+wholesale)/2,
// wholesale, low = wholesale*0.8; half-up to cents.
Money derive_budget(const Product& product, BudgetLevel level);

/// Seeded uniform sample without replacement; keeps catalog order.
std::vector<Product> sample_products(const std::vector<Product>& all, std::size_t count,
                                     std::uint64_t seed);

}  // namespace dealbench::catalog
