#include "lcw/dataset.hpp"

namespace lcw {

DatasetRow make_dataset_row(const ProjectData& project, const LibraryRecord& rec) {
    DatasetRow row;
    row.coordinate = rec.coordinate;
    for (const auto& id : project.assessor_ids()) {
        const Assessment* a = rec.assessment_of(id);
        row.assessor_choices.push_back(a ? a->choices : std::vector<Topic>{});
        row.done.push_back(a && a->done);
    }
    row.report = rec.report;
    if (rec.final_category) {
        if (rec.report && rec.report->scenario.kind == ScenarioKind::AutoFinal)
            row.coincident = rec.final_category;
        else
            row.arbitrated = rec.final_category;
        row.final_category = rec.final_category;
        row.category_class = project.config.partition.class_of(*rec.final_category);
        row.revised_class = final_class(rec, project.config.partition);
    }
    row.av_network = has_network_vector(rec.vulnerabilities);
    if (rec.revision) row.revision = rec.revision->decision;
    row.comment = rec.comment;
    return row;
}

std::vector<DatasetRow> dataset_rows(const ProjectData& project) {
    std::vector<DatasetRow> rows;
    rows.reserve(project.libraries.size());
    for (const auto& rec : project.libraries) rows.push_back(make_dataset_row(project, rec));
    return rows;
}

}  // namespace lcw
