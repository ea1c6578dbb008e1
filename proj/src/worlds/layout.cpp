#include <sstream>
#include <stdexcept>

#include "planshape/worlds/world.hpp"

namespace planshape::worlds {

namespace {

Cell cell_from_char(char c, int wood_seen) {
    switch (c) {
        case '.': case 'A': return {CellType::empty, 0};
        case '#': return {CellType::wall, 0};
        case 'K': return {CellType::key, 0};
        case 'k': return {CellType::distractor_key, 0};
        case 'D': return {CellType::door, 0};
        case 'L': return {CellType::lava, 0};
        case 'G': return {CellType::goal, 0};
        case 'T': return {CellType::tube, 0};
        case 'H': return {CellType::ladder, 0};
        case 'R': return {CellType::rock, 0};
        case 'C': return {CellType::dock, 0};
        case 'W': return {CellType::wood, static_cast<std::uint8_t>(wood_seen)};
        case 'P': return {CellType::workshop, 0};
        case '1': return {CellType::workshop, 1};
        case '2': return {CellType::workshop, 2};
        case '3': return {CellType::workshop, 3};
        default:
            throw std::invalid_argument(std::string("unknown layout cell '") + c + "'");
    }
}

int parse_dir(const std::string& word) {
    if (word == "right") return 0;
    if (word == "down") return 1;
    if (word == "left") return 2;
    if (word == "up") return 3;
    throw std::invalid_argument("unknown facing '" + word + "'");
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

GridWorld load_layout(std::string_view text, std::string id) {
    GridWorld w;
    w.id = std::move(id);
    std::istringstream in{std::string(text)};
    std::string line;
    std::vector<std::string> rows;
    bool agent_found = false;
    while (std::getline(in, line)) {
        if (line.find('=') != std::string::npos) {
            const auto eq = line.find('=');
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (key == "family") {
                if (value == "turn") {
                    w.family = ActionFamily::turn_based;
                } else if (value == "cardinal") {
                    w.family = ActionFamily::cardinal;
                } else {
                    throw std::invalid_argument("unknown family '" + value + "'");
                }
            } else if (key == "facing") {
                w.start_dir = parse_dir(value);
            } else if (key == "random_start") {
                w.random_start = value == "true";
            } else if (key == "horizon") {
                w.max_steps = std::stoi(value);
            } else if (key == "slip") {
                w.slip_prob = std::stod(value);
            } else {
                throw std::invalid_argument("unknown layout key '" + key + "'");
            }
            continue;
        }
        const std::string row = trim(line);
        if (!row.empty()) rows.push_back(row);
    }
    if (rows.empty()) throw std::invalid_argument("layout has no grid rows");
    w.height = static_cast<int>(rows.size());
    w.width = static_cast<int>(rows[0].size());
    int wood_seen = 0;
    for (int y = 0; y < w.height; ++y) {
        if (static_cast<int>(rows[y].size()) != w.width) {
            throw std::invalid_argument("ragged layout row " + std::to_string(y));
        }
        for (int x = 0; x < w.width; ++x) {
            const char c = rows[y][x];
            Cell cell = cell_from_char(c, wood_seen);
            if (cell.type == CellType::wood) ++wood_seen;
            if (c == 'A') {
                w.start_x = x;
                w.start_y = y;
                agent_found = true;
            }
            w.cells.push_back(cell);
        }
    }
    if (!agent_found) throw std::invalid_argument("layout has no agent start 'A'");

    // A full-width wall row splits mario into the two platforms.
    for (int y = 1; y + 1 < w.height; ++y) {
        bool full = true;
        for (int x = 0; x < w.width; ++x) full = full && w.at(x, y).type == CellType::wall;
        if (full) {
            w.divider_row = y;
            break;
        }
    }
    if (!w.find(CellType::tube).empty()) {
        if (w.divider_row < 0) throw std::invalid_argument("tube layout needs a divider wall row");
        const int tube = w.find(CellType::tube)[0];
        const int tx = tube % w.width, ty = tube / w.width;
        if (ty >= w.divider_row || w.at(tx, w.divider_row + 1).type != CellType::empty) {
            throw std::invalid_argument("tube must sit above the divider over an open cell");
        }
        for (int idx : w.find(CellType::ladder)) {
            const int lx = idx % w.width, ly = idx / w.width;
            if (ly <= w.divider_row || w.at(lx, w.divider_row - 1).type != CellType::empty) {
                throw std::invalid_argument("ladder must sit below the divider under an open cell");
            }
        }
    }

    w.action_count = w.family == ActionFamily::cardinal ? 4 : 3;
    if (w.family == ActionFamily::turn_based &&
        (!w.find(CellType::key).empty() || !w.find(CellType::door).empty())) {
        w.action_count = 5;  // pickup + toggle
    }
    w.max_steps = w.max_steps > 0 ? w.max_steps : 500;
    return w;
}

std::vector<int> GridWorld::find(CellType t) const {
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(cells.size()); ++i) {
        if (cells[i].type == t) out.push_back(i);
    }
    return out;
}

}  // namespace planshape::worlds
