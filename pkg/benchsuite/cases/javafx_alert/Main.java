public class Main {
    public static void main(String[] args) {
        Alert alert = new Alert(Alert.AlertType.INFORMATION);
        alert.setTitle("Notice");
        alert.setContentText("saved");
        alert.showAndWait();
    }
}
