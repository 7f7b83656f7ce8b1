//! Published example tables used throughout the tests and documentation.

use crate::table::ContingencyTable;

/// First and second purchases of five brands of decaffeinated coffee
/// (n = 541). Rows are the first purchase, columns the second.
pub fn coffee() -> ContingencyTable {
    ContingencyTable::new(
        vec!["HP", "TC", "SA", "NE", "BR"],
        vec![
            vec![93, 17, 44, 7, 10],
            vec![9, 46, 11, 0, 9],
            vec![17, 11, 155, 9, 12],
            vec![6, 4, 9, 15, 2],
            vec![10, 4, 12, 2, 27],
        ],
    )
    .expect("coffee table is valid")
}

/// 1989 General Social Survey, opinions on sex relations of early teens
/// (rows: premarital, columns: extramarital; 1 = always wrong ... 4 = not wrong).
pub fn gss_early_teens() -> ContingencyTable {
    ContingencyTable::new(
        vec!["1", "2", "3", "4"],
        vec![
            vec![140, 1, 0, 0],
            vec![30, 3, 1, 0],
            vec![66, 4, 2, 0],
            vec![83, 15, 10, 1],
        ],
    )
    .expect("GSS table I is valid")
}

/// 1989 General Social Survey, opinions on a man and a woman having sex
/// relations before marriage. Same categories as [`gss_early_teens`].
pub fn gss_before_marriage() -> ContingencyTable {
    ContingencyTable::new(
        vec!["1", "2", "3", "4"],
        vec![
            vec![3, 1, 0, 0],
            vec![3, 1, 1, 0],
            vec![15, 8, 0, 0],
            vec![23, 8, 7, 0],
        ],
    )
    .expect("GSS table II is valid")
}
