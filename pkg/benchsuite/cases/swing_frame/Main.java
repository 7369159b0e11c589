public class Main {
    public static void main(String[] args) {
        JFrame frame = new JFrame("greeter");
        JLabel label = new JLabel("hello");
        frame.add(label);
        frame.setSize(300, 200);
        frame.setVisible(true);
    }
}
