//! Hausdorff distances between points, boxes and point clouds.
use tubevar::geometry::{directed_distance, hausdorff_distance};
use tubevar::SetValue;

fn main() -> tubevar::Result<()> {
    let unit = SetValue::boxed([0.0, 0.0], [1.0, 1.0]);
    let shifted = SetValue::boxed([0.5, 0.0], [2.0, 1.0]);
    let cloud = SetValue::cloud(vec![vec![0.0, 0.0], vec![1.0, 1.0]]);
    let pt = SetValue::point([1.0, 0.0]);

    println!("d_H(unit box, shifted box) = {}", hausdorff_distance(&unit, &shifted)?);
    println!("sup-inf cloud -> point     = {}", directed_distance(&cloud, &pt)?);
    println!("sup-inf point -> cloud     = {}", directed_distance(&pt, &cloud)?);
    println!("d_H(cloud, point)          = {}", hausdorff_distance(&cloud, &pt)?);
    Ok(())
}
