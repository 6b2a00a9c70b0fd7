#pragma once

#include "lcw/model.hpp"
#include "lcw/workflow.hpp"

#include <vector>

namespace lcw {

/// Sheet view of one library. Total for every record; unfinished columns stay empty.
DatasetRow make_dataset_row(const ProjectData& project, const LibraryRecord& rec);

/// One row per library in import order.
std::vector<DatasetRow> dataset_rows(const ProjectData& project);

}  // namespace lcw
