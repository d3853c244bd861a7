"""Worked-example texts shared across the test suite."""

GOLDEN_INSTRUCTION = (
    "Article 10 is amended as follows:\n"
    "1° The words « in the last week of August » are replaced by the words "
    "« during the month of December »;\n"
    "2° The second sentence is deleted."
)

GOLDEN_INPUT = (
    "Appointments are made each year in the last week of August. "
    "The general meeting of the order meets at the courthouse."
)

GOLDEN_RESPONSE = "Appointments are made each year during the month of December."

SPAN_EXISTING_P1 = (
    "the duties corresponding to the post of Chief State Public Works Engineer "
    "in the second group referred to in Article 8 of this Decree are, for the "
    "post reporting to the Minister for Foreign Affairs:"
)

SPAN_EXISTING_P2 = (
    "Charged with the duties of Deputy Director of Real Estate Operations in the "
    "Real Estate Affairs Department within the General Administration Department."
)

SPAN_EXISTING = SPAN_EXISTING_P1 + "\n" + SPAN_EXISTING_P2

SPAN_MODIFICATION = (
    "The second paragraph of Article 1 of the above-mentioned Order of 4 May 2007 "
    "is replaced by the following provisions:\n"
    "« Assistant to the Deputy Director of Real Estate Operations. »"
)

SPAN_NEW_PARAGRAPH = "Assistant to the Deputy Director of Real Estate Operations."

SPAN_EXPECTED = SPAN_EXISTING_P1 + "\n" + SPAN_NEW_PARAGRAPH
