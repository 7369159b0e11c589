public class Main {
    public static void main(String[] args) {
        LocalDate today = LocalDate.now();
        LocalDate due = today.plusDays(30);
        System.out.println("invoice due " + due);
    }
}
