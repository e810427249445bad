#include "dealbench/catalog.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"

namespace dealbench::catalog {

namespace {

using nlohmann::json;

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string require_string(const json& record, const char* key, std::size_t index) {
    auto it = record.find(key);
    if (it == record.end())
        throw SchemaError(index, std::string("missing key \"") + key + "\"");
    if (!it->is_string())
        throw SchemaError(index, std::string("key \"") + key + "\" is not a string");
    return it->get<std::string>();
}

Product parse_record(const json& record, std::size_t index) {
    if (!record.is_object()) throw SchemaError(index, "not a JSON object");
    Product p;
    p.name = require_string(record, "Product Name", index);
    const std::string retail_raw = require_string(record, "Retail Price", index);
    const std::string wholesale_raw = require_string(record, "Wholesale Price", index);
    try {
        p.retail_price = parse_price(retail_raw);
        p.wholesale_price = parse_price(wholesale_raw);
    } catch (const MoneyError& e) {
        throw SchemaError(index, e.what());
    }
    p.features = require_string(record, "Features", index);
    p.reference = require_string(record, "Reference", index);
    if (auto it = record.find("Category"); it != record.end() && it->is_string())
        p.category = category_from_string(it->get<std::string>());
    if (p.wholesale_price >= p.retail_price)
        throw InvariantError(index, p.name,
                             "wholesale price " + p.wholesale_price.str() +
                                 " is not below retail price " + p.retail_price.str());
    return p;
}

}  // namespace

std::string to_string(Category c) {
    switch (c) {
        case Category::electronics: return "electronics";
        case Category::motor_vehicle: return "motor_vehicle";
        case Category::real_estate: return "real_estate";
        case Category::other: break;
    }
    return "other";
}

Category category_from_string(std::string_view s) {
    const std::string v = lower(s);
    if (v == "electronics" || v == "electronic devices" || v == "electronic_devices")
        return Category::electronics;
    if (v == "motor_vehicle" || v == "motor vehicles" || v == "motor vehicle")
        return Category::motor_vehicle;
    if (v == "real_estate" || v == "real estate") return Category::real_estate;
    return Category::other;
}

std::string to_string(BudgetLevel level) {
    switch (level) {
        case BudgetLevel::high: return "high";
        case BudgetLevel::retail: return "retail";
        case BudgetLevel::mid: return "mid";
        case BudgetLevel::wholesale: return "wholesale";
        case BudgetLevel::low: break;
    }
    return "low";
}

std::optional<BudgetLevel> budget_level_from_string(std::string_view s) {
    const std::string v = lower(s);
    if (v == "high") return BudgetLevel::high;
    if (v == "retail") return BudgetLevel::retail;
    if (v == "mid") return BudgetLevel::mid;
    if (v == "wholesale") return BudgetLevel::wholesale;
    if (v == "low") return BudgetLevel::low;
    return std::nullopt;
}

Money parse_price(std::string_view raw) { return Money::parse(raw); }

std::vector<Product> load_catalog(std::istream& source) {
    std::ostringstream buf;
    buf << source.rdbuf();
    return load_catalog_text(buf.str());
}

std::vector<Product> load_catalog_text(std::string_view text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    std::vector<Product> products;
    if (first == std::string_view::npos) return products;

    if (text[first] == '[') {
        json arr;
        try {
            arr = json::parse(text);
        } catch (const json::exception& e) {
            throw CatalogError(std::string("invalid catalog JSON: ") + e.what());
        }
        if (!arr.is_array()) throw CatalogError("catalog JSON is not an array");
        products.reserve(arr.size());
        for (std::size_t i = 0; i < arr.size(); ++i) products.push_back(parse_record(arr[i], i));
        return products;
    }

    // JSON-lines fallback: one object per non-empty line.
    std::istringstream lines{std::string(text)};
    std::string line;
    std::size_t index = 0;
    while (std::getline(lines, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json record;
        try {
            record = json::parse(line);
        } catch (const json::exception& e) {
            throw SchemaError(index, std::string("invalid JSON line: ") + e.what());
        }
        products.push_back(parse_record(record, index));
        ++index;
    }
    return products;
}

std::vector<Product> load_catalog_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw CatalogError("cannot open catalog file: " + path.string());
    return load_catalog(in);
}

std::string serialize_catalog(const std::vector<Product>& products) {
    json arr = json::array();
    for (const auto& p : products) {
        arr.push_back({{"Product Name", p.name},
                       {"Retail Price", "$" + p.retail_price.str()},
                       {"Wholesale Price", "$" + p.wholesale_price.str()},
                       {"Features", p.features},
                       {"Reference", p.reference},
                       {"Category", to_string(p.category)}});
    }
    return arr.dump(2);
}

Money derive_budget(const Product& product, BudgetLevel level) {
    switch (level) {
        case BudgetLevel::high: return product.retail_price.mul_ratio(6, 5);
        case BudgetLevel::retail: return product.retail_price;
        case BudgetLevel::mid: return (product.retail_price + product.wholesale_price).mul_ratio(1, 2);
        case BudgetLevel::wholesale: return product.wholesale_price;
        case BudgetLevel::low: break;
    }
    return product.wholesale_price.mul_ratio(4, 5);
}

namespace {

// Unbiased bounded draw; avoids uniform_int_distribution so the sample is
// stable across standard library implementations.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
        const std::uint64_t r = rng();
        if (r >= threshold) return r % n;
    }
}

}  // namespace

std::vector<Product> sample_products(const std::vector<Product>& all, std::size_t count,
                                     std::uint64_t seed) {
    if (count >= all.size()) return all;
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> indices(all.size());
    for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(bounded(rng, indices.size() - i));
        std::swap(indices[i], indices[j]);
    }
    indices.resize(count);
    std::sort(indices.begin(), indices.end());
    std::vector<Product> sampled;
    sampled.reserve(count);
    for (std::size_t idx : indices) sampled.push_back(all[idx]);
    return sampled;
}

}  // namespace dealbench::catalog
